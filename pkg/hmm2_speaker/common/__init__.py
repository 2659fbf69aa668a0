from .errors import *
from .numerics import *
from .app_config import *
from .config_manager import *
from .metrics import *
