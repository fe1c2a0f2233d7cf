"""Gradient-descent laboratory for overparametrised scalar factorisation.

The heavy lifting lives in the compiled extension `_eoslab`; this package
re-exports its public surface.
"""

from ._eoslab import (  # noqa: F401
    FactorisationProblem,
    GeometryConstants,
    Regime,
    RegimeSpec,
    Trajectory,
    TrajectoryRecord,
    TubeCoords,
    c_coeff,
    c_star_closed_form,
    classify,
    deriv_tensor_contract,
    detect_cycle2,
    detect_tau,
    f,
    fit_rate,
    flip_step,
    gd_step,
    geometry_constants,
    grad_f,
    grad_loss,
    hess_f,
    loss,
    normal,
    normal_form_par_predict,
    normal_form_perp_predict,
    parabolic_step,
    phi_coordinate,
    project,
    reconstruct,
    riem_grad_lambda,
    riem_hess_lambda,
    riem_hess_lambda_closed,
    run,
    run_experiment,
    sample_near,
    sharpness,
    summarize,
    tangent_eigenvalues,
    tube_coords,
    dl3_n,
    dl4_n,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
