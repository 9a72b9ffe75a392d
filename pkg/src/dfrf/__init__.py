"""Deep-structured fully-connected random fields for interactive image
segmentation: seed-trained mixture unaries, sparse encoding layers that
mediate dense pixel interactions in linear time, and layer-wise MAP
refinement, plus a benchmark harness and an HTTP annotation service.
"""

from .core import (
    BG,
    FG,
    UNLABELED,
    DfrfConfig,
    ImageObservation,
    LabelField,
    SeedMask,
    validate_inputs,
)
from .encoding import EncodingLayer, build_encoding_layer, pixel_features, sparsify
from .inference import (
    LayerEnergyParams,
    LayerTrace,
    NodeLabelStats,
    explicit_pairwise_energy,
    icm_sweep,
    layer_energy,
    map_inference,
    run_dfrf,
)
from .mixture import (
    MixtureModel,
    UnaryField,
    fit_fmm,
    log_likelihood,
    responsibilities,
    seed_unary,
)
from .bench import (
    BenchReport,
    CorpusEntry,
    add_noise,
    f1_score,
    load_corpus,
    noise_field,
    run_bench,
)
from .synth import generate_corpus

__version__ = "0.1.0"

__all__ = [
    "BG",
    "FG",
    "UNLABELED",
    "BenchReport",
    "CorpusEntry",
    "DfrfConfig",
    "EncodingLayer",
    "ImageObservation",
    "LabelField",
    "LayerEnergyParams",
    "LayerTrace",
    "MixtureModel",
    "NodeLabelStats",
    "SeedMask",
    "UnaryField",
    "add_noise",
    "build_encoding_layer",
    "explicit_pairwise_energy",
    "f1_score",
    "fit_fmm",
    "generate_corpus",
    "icm_sweep",
    "layer_energy",
    "load_corpus",
    "log_likelihood",
    "map_inference",
    "noise_field",
    "pixel_features",
    "responsibilities",
    "run_bench",
    "run_dfrf",
    "seed_unary",
    "sparsify",
    "validate_inputs",
]
