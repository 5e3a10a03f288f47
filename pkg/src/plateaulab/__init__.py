"""plateaulab: numerical laboratory for calibrated volume and CR geometry.

Modules
-------
multivector   sparse exterior algebra, calibration pairing, comass, mass bracket
surfaces      real 2-codimensional surface models and complex-tangency detection
normalform    quadratic jets, flat/special normal forms, point classification
orbits        level-slice sampling, component counting, orbit-space lifts
plateau       leaf charts, volume/energy quadrature, competitor perturbations
moment        boundary moment integrals, shock-wave probes, slice Cauchy data
cli           command-line reports (JSON/CSV plus rendered figures)
"""

__version__ = "0.1.0"
