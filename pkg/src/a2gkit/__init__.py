"""UAV air-to-ground link modeling and RSRP-based ground-source localization."""

from .antenna import AnglePair, AntennaPattern, dipole_gain, gain, link_gains, load_pattern
from .errors import A2GError
from .geo import (
    EARTH_RADIUS_M,
    GeoPoint,
    LinkGeometry,
    ProjectionConfig,
    haversine_distance,
    horizontal_distance,
    link_geometry,
)
from .harness import (
    CampaignConfig,
    Trajectory,
    evaluate_rmse,
    experiment_offline,
    experiment_online,
    gen_trajectory,
    run_campaign,
)
from .locate import (
    LocalizerConfig,
    LocEstimate,
    LsSystem,
    Measurement,
    OnlineState,
    SelectionStrategy,
    build_ls_system,
    fixed_point_localize,
    moving_average,
    online_localize,
    residual,
    rsrp_to_distance_sq,
    select_samples,
    solve_ls,
    weight,
)
from .patternest import EstimatedPattern, estimate_pattern, pattern_error
from .propagation import (
    CarrierConfig,
    GroundParams,
    PropagationModel,
    RsrpSample,
    ShadowingModel,
    free_space_gain,
    path_loss_db,
    reflection_coefficient,
    synthesize_rsrp,
    two_ray_gain,
)

__version__ = "0.1.0"

__all__ = [
    "A2GError",
    "AnglePair",
    "AntennaPattern",
    "CampaignConfig",
    "CarrierConfig",
    "EARTH_RADIUS_M",
    "EstimatedPattern",
    "GeoPoint",
    "GroundParams",
    "LinkGeometry",
    "LocEstimate",
    "LocalizerConfig",
    "LsSystem",
    "Measurement",
    "OnlineState",
    "ProjectionConfig",
    "PropagationModel",
    "RsrpSample",
    "SelectionStrategy",
    "ShadowingModel",
    "Trajectory",
    "build_ls_system",
    "dipole_gain",
    "estimate_pattern",
    "evaluate_rmse",
    "experiment_offline",
    "experiment_online",
    "fixed_point_localize",
    "free_space_gain",
    "gain",
    "gen_trajectory",
    "haversine_distance",
    "horizontal_distance",
    "link_gains",
    "link_geometry",
    "load_pattern",
    "moving_average",
    "online_localize",
    "path_loss_db",
    "pattern_error",
    "reflection_coefficient",
    "residual",
    "rsrp_to_distance_sq",
    "run_campaign",
    "select_samples",
    "solve_ls",
    "synthesize_rsrp",
    "two_ray_gain",
    "weight",
]
