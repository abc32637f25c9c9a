"""Certified Muckenhoupt constants and boundedness of the multiplication operator
on polynomial Sobolev spaces."""

from .measure import (
    Factor,
    Measure,
    MeasureError,
    NumericMeasure,
    Piece,
    WeightExpr,
    density_at,
    envelope,
    expneg,
    is_finite,
    load_measure,
    logpower,
    loglogpower,
    measure_of,
    positive_part,
    power,
    total_mass,
)
from .order import TRIVIAL, UNKNOWN, ZERO, OrderTuple

__version__ = "0.1.0"
