'''Exact computation and certification of global log canonical thresholds of Du Val del Pezzo surfaces.'''

__version__ = '0.1.0'
