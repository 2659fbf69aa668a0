from .audio import *
from .lpc import *
