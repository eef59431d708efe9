"""LEO constellation routing: Dijkstra, Q-routing and multi-agent deep Q routing."""

from ._core import (
    ConfigError,
    EcefVector,
    GeoPosition,
    LinkBudgetParams,
    MlpParams,
    OrbitalShell,
    RunConfig,
    compare_runs,
    compute_reward,
    default_config,
    forward,
    free_space_path_loss_db,
    gateway_position,
    geodetic_to_ecef,
    hop_latency,
    init_mlp,
    link_data_rate_bps,
    link_snr_db,
    load_config,
    load_run,
    load_weights,
    parse_config,
    run_experiment,
    satellite_position,
    save_weights,
    select_modcod,
    serialize_weights,
    slant_range,
)

__all__ = [name for name in dir() if not name.startswith("_")]
