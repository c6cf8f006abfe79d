"""
Data types for the amplification lab.
"""

from .quaternion import AlgebraSpec, OrderBasis, OrderElement
from .plane import PlanePoint, Isometry
from .satake import SatakeParameter, EigenvalueSequence, AmplifierSupport, AmplifierExpansion
from .tree import TruncatedTree

__all__ = ['AlgebraSpec', 'OrderBasis', 'OrderElement', 'PlanePoint', 'Isometry',
           'SatakeParameter', 'EigenvalueSequence', 'AmplifierSupport', 'AmplifierExpansion',
           'TruncatedTree']
