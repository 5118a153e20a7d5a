"""Numerics for transcendental entire functions of bounded type: tracts and
logarithmic coordinates, overflow-safe orbit classification, dynamic rays,
periodic points and escape-time rendering."""
from .errors import (AddressInfeasible, DynamicsError, EmptyShell, Indeterminate,
                     MapOverflow, NoCutRay, NotInDomain, NotInTract, NotPeriodic,
                     NoThreshold, NoWitness, OutsideDomain, PullbackDivergence)
from .fixedpoints import (Attracting, FixedPointInfo, IrrationallyIndifferent,
                          ParabolicCandidate, Repelling, classify, find_fixed_points,
                          rotation_number_cf)
from .logdyn import (domain_index, find_CF, geometry, in_tract, phi, size_r,
                     verify_expansion)
from .maps import (EntireMap, bound_K, cosine, derivative, evaluate, exp_affine,
                   exp_shift, golden_exp_affine, golden_sine, parse_descriptor,
                   petal_exp, sine, singular_values, to_descriptor, zexp)
from .orbits import (BigPoint, Escaping, LeftDomains, Undecided, classify_batch,
                     classify_growth, estimate_Rprime, step)
from .rays import (ExternalAddress, hair_confinement_check, land_ray, ray_point,
                   trace_ray)
from .render import (Viewport, overlay_singular_orbit, render, rotation_estimate,
                     write_ppm)

__version__ = "0.1.0"
