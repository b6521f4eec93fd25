'''
innerlab: a numerical laboratory for inner multipliers on spaces with
complete Nevanlinna-Pick kernels, at truncated scale.
'''

__version__ = '0.1.0'
