from orbifold_gw.CorrelatorSystem import CorrelatorKey, CorrelatorTable, Insertion, p1_reconstruct, wdvv_residual
from orbifold_gw.InertiaSystem import Sector, SectorType, Weights, census, stringy_basis, wps_census
from orbifold_gw.OrbifoldConfig import OrbifoldConfig
from orbifold_gw.PolynomialAlgebra import Monomial, Polynomial, RewriteSystem, normal_form
from orbifold_gw.QuantumRing import QuantumRing, pairing_matrix, structure_constants, verify_ring
from orbifold_gw.TwistedCurveSystem import Football, PicClass, SheafClass, euler_char, solve_map_picard, virtual_dim
from orbifold_gw.orbifold_gw_cli import main, run

__all__ = [
    "CorrelatorKey",
    "CorrelatorTable",
    "Football",
    "Insertion",
    "Monomial",
    "OrbifoldConfig",
    "PicClass",
    "Polynomial",
    "QuantumRing",
    "RewriteSystem",
    "Sector",
    "SectorType",
    "SheafClass",
    "Weights",
    "census",
    "euler_char",
    "main",
    "normal_form",
    "p1_reconstruct",
    "pairing_matrix",
    "run",
    "solve_map_picard",
    "stringy_basis",
    "structure_constants",
    "verify_ring",
    "virtual_dim",
    "wdvv_residual",
    "wps_census",
]
