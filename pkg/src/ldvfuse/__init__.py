"""Compressed-video enhancement that exploits the HEVC low-delay coding structure."""

from .codec import (
    DegradationProfile,
    FrameKind,
    GopConfig,
    Kind,
    classify_frame,
    encode_external,
    segment_video,
    simulate_low_delay,
)
from .enhance import (
    Enhancer,
    ExternalEnhancer,
    FrameMapEnhancer,
    IdentityEnhancer,
    SmoothEnhancer,
    TrimAnalysisConfig,
    enhancer_external,
    enhancer_identity,
    enhancer_smooth,
    run_variants,
    trim_analysis,
)
from .ensemble import TtaConfig, TtaEnhancer, tta_enhance
from .errors import *  # noqa: F401,F403
from .frames import (
    DIHEDRAL_ELEMENTS,
    Dihedral,
    Frame,
    VideoSequence,
    apply_dihedral,
    compose_dihedral,
    convert_scale,
    frame_linear_combine,
    inverse_dihedral,
)
from .fusion import (
    FusionConfig,
    FusionPlan,
    HeuristicConfig,
    HeuristicDecision,
    Source,
    VariantSet,
    apply_plan,
    average_frame,
    build_plan,
    detect_slow_motion,
    fuse,
    gradient_energy,
    select_stride,
)
from .metrics import (
    IDENTICAL,
    LossBreakdown,
    LossWeights,
    MetricsReport,
    charbonnier,
    combined_loss,
    delta_series,
    psnr_frame,
    psnr_sequence,
    tg_loss,
    tv_loss,
)
from .vio import (
    StreamHeader,
    encode_y4m,
    load_y4m,
    read_raw_yuv,
    read_y4m,
    save_y4m,
    write_report,
    write_y4m,
)

__version__ = "0.1.0"
