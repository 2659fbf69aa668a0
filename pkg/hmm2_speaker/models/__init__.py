from .observation import *
from .topology import *
from .lattice import *
from .emissions import *
from .training import *
from .base_hmm import *
from .hmm1 import *
from .hmm2 import *
from .initialize import *
from .random_models import *
