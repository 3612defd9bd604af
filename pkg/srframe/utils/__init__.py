"""
Some utilities used in srframe are located here.
"""
from .const import *
from .errors import *
from .key_value import read_key_value
from .parallel import parallel_map
