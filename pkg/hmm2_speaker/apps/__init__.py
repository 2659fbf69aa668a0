from .console_app import *
