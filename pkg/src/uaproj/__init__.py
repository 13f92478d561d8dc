"""Uncertainty-aware projection of Gaussian-mixture-modeled data.

Builds weighted uncertainty-aware PCA projections from per-class mixture
models, projects densities in closed form, extracts highest-density contour
lines, and quantifies projection fidelity against a sample-based reference.
"""

from .errors import (
    DimensionMismatchError,
    FitError,
    NumericalError,
    SingularModelError,
    ValidationError,
)
from .model import (
    DensityGrid,
    Gaussian,
    ImportanceWeights,
    LabeledDataset,
    MixtureModel,
    ProjectionMatrix,
    gaussian_logpdf,
    gaussian_pdf,
    mixture_logpdf,
    mixture_pdf,
)
from .moments import AggregatedMoments, aggregate_mixture, empirical_moments
from .projection import (
    WeightedMomentSet,
    build_weighted_moments,
    pca,
    project_gaussian,
    project_mixture,
    project_samples,
    projection_from_ua,
)
from .fitting import (
    ClassFit,
    EMFit,
    FitConfig,
    FitReport,
    bic_score,
    em_fit,
    fit_labeled,
    select_components,
)
from .contours import (
    ContourLevelSet,
    contour_set,
    extract_isolines,
    hdr_thresholds,
    rasterize,
)
from .metrics import (
    EvalConfig,
    MetricReport,
    evaluate_strategies,
    kde_grid,
    kl_grid,
    sliced_w2,
    weighted_average,
)
from .dataio import (
    load_class_models,
    load_csv,
    load_projection,
    read_json,
    save_class_fits,
    save_projection,
    write_json,
)
from .sampling import (
    AnalyticSpec,
    ClassSpec,
    DimensionSpec,
    make_synthetic_multimodal,
    sample_analytic,
    sample_gaussian,
    sample_mixture,
    substream,
)

__version__ = "0.1.0"
