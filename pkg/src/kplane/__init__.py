"""Exponent calculus and grid numerics for k-plane maximal operators."""

from .exponents import (BoundSpec, DerivationTrace, KcritKind, Operator, Pipeline, Rule,
                        RuleInapplicable, SeedKind, closed_form, derive_pipeline, hausdorff_bound,
                        interp_step, kcrit, l2_step, q_restrict, seed_bound, xray_step)
from .grassmann import Frame, HemisphereChart, haar_sample, lift, sphere_sample
from .transforms import (GridFunction, PlateSpec, kplane_transform, lp_band, maximal_plane,
                         maximal_plate, sobolev_norm, xray, xray_l2_norm)

__version__ = "0.1.0"

__all__ = [
    "BoundSpec", "DerivationTrace", "KcritKind", "Operator", "Pipeline", "Rule", "RuleInapplicable",
    "SeedKind", "closed_form", "derive_pipeline", "hausdorff_bound", "interp_step", "kcrit", "l2_step",
    "q_restrict", "seed_bound", "xray_step",
    "Frame", "HemisphereChart", "haar_sample", "lift", "sphere_sample",
    "GridFunction", "PlateSpec", "kplane_transform", "lp_band", "maximal_plane", "maximal_plate",
    "sobolev_norm", "xray", "xray_l2_norm",
]
