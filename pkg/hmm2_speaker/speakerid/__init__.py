from .speaker_db import *
from .evaluation import *
from .synth import *
