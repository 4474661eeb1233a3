"""Persistence modules over F_p: barcodes, interleavings, Kan-extension interpolation."""
from ._backend import BACKEND
from .complexes import (
    Certificate,
    ModuleComplex,
    Refuted,
    Unknown,
    cech_complex,
    cech_membership,
    counterexample_triple,
    rips_complex,
    sandwich_check,
)
from .core import (
    GridModule,
    ModuleMorphism,
    compose,
    direct_sum,
    hom_basis,
    interval_module,
    sigma,
    verify_interleaving,
    zero_module,
)
from .decomposition import PersistenceDiagram, barcode, module_from_diagram, rank_invariant
from .kan import (
    CoherentSystem,
    KanExtension,
    extend,
    image_extension_at,
    lan_at,
    ran_at,
    segment_interpolation,
    simplex_interpolation,
    star_interpolation,
    verify_coherent,
)
from .metrics import (
    BudgetExceeded,
    bottleneck,
    bottleneck_distance,
    interleaving_distance,
    interleaving_oracle,
    oracle_distance,
)
from .rational import INF
from .spacetime import FiniteMetricSpace, NotLipschitz, eta, worldline_interleaving_distance

__version__ = "0.1.0"
