"""
qwalk - coined quantum-walk spatial search simulator and analysis toolkit.
"""

__version__ = "0.1.0"
