"""A length-independent 3-layer transformer that recognizes parity.

The construction lives in :mod:`parityformer.construction`, the generic
layer evaluator in :mod:`parityformer.interpreter`, closed-form references
in :mod:`parityformer.semantic` and the audits in
:mod:`parityformer.verification`.
"""
from .construction import DEFAULT_LAYOUT, ConstructionParams, StreamLayout, build_parity_spec
from .encoding import telescope_value, temperature
from .errors import ConfigurationError, DocumentError, IndeterminateDecision
from .interpreter import (
    AffineMap,
    AttentionLayer,
    Decision,
    PiecewiseLinearNet,
    RunTrace,
    TransformerSpec,
    apply_layer,
    attend,
    run_transformer,
    softmax_weights,
)
from .kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .scalar import FLOAT64, Float64Backend, MPBackend, get_backend
from .semantic import (
    SemanticTrace,
    semantic_coeffs,
    semantic_decide,
    semantic_gamma,
    semantic_theta,
)

__version__ = "0.1.0"
