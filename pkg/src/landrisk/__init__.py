"""Risk maps, evaluation metrics and safe landing zones from aerial semantic label maps."""
from .classes import (
    MAX_RISK,
    N_RISK_LEVELS,
    ClassEntry,
    ClassTable,
    ClassTableError,
    LabelError,
    argmax_labels,
    build_class_table,
    default_class_table,
    load_class_table,
    map_class_to_risk,
)
from .codecs import (
    CodecError,
    RiskColormap,
    decode_label_image,
    decode_labels_raw,
    decode_risk_image,
    decode_risk_raw,
    default_colormap,
    encode_label_image,
    encode_labels_raw,
    encode_risk_image,
    encode_risk_raw,
    load_colormap,
    overlay,
    render_risk,
)
from .metrics import (
    ConfusionMatrix,
    MetricsError,
    MetricsReport,
    balanced_accuracy,
    coarsen,
    confusion,
    f1_per_class,
    iou_per_class,
    mean_f1,
    mean_iou,
    pixel_accuracy,
    row_normalize,
)
from .morphology import (
    DilationPolicy,
    Region,
    SlzCandidate,
    connected_regions,
    dilate_risk,
    distance_to_risk,
    select_slz,
)
from .pipeline import PipelineStats, RunConfig, load_run_config, run_stream
from .sora import (
    Environment,
    OperationalScenario,
    Visibility,
    grc_lookup,
    risk_level_description,
)

__version__ = "0.1.0"
