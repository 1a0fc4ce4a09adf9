"""
Exact polyhedral toolkit for strong semisimplicity of finitely generated MV-algebras.
"""
__version__ = "0.1.0"
