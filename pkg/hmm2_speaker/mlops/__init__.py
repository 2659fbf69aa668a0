from .flow_context import *
from .flow_pipeline import *
from .model_registry import *
from .feature_store import *
from .corpus_manifest import *
from .model_bench import *
