"""Threshold dynamics for (volume-preserving, forced, multiphase) mean-curvature flow."""

from ._mbo import (
    DegeneratePhase,
    Grid,
    HeatKernelPlan,
    JunctionAngles,
    LedgerReport,
    MultiPhaseState,
    PhaseField,
    SurfaceTensionMatrix,
    Trajectory,
    circle_mcf,
    dissipation_multiphase,
    dissipation_two_phase,
    energy_multiphase,
    energy_two_phase,
    junction_angles,
    ledger_check,
    rasterize_ball,
    rasterize_half_space,
    run,
    step_forced,
    step_grain_growth,
    step_mbo,
    step_volume_preserving,
    two_ball_vp,
    voronoi_labels,
    voronoi_labels_in_ball,
)

__all__ = [name for name in dir() if not name.startswith("_")]
