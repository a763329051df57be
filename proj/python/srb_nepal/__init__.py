try:
    from ._srb import (
        InputError,
        ModelConfig,
        SrbObservation,
        TransitionParams,
        ar1_logprior,
        fit,
        jackknife_log_se,
        obs_loglik,
        onset_prior_mean,
        ratio_cv,
        theta,
        trapezoid_alpha,
    )
except ImportError:  # running against a build tree, module not installed
    from _srb import (
        InputError,
        ModelConfig,
        SrbObservation,
        TransitionParams,
        ar1_logprior,
        fit,
        jackknife_log_se,
        obs_loglik,
        onset_prior_mean,
        ratio_cv,
        theta,
        trapezoid_alpha,
    )

__all__ = [
    "InputError",
    "ModelConfig",
    "SrbObservation",
    "TransitionParams",
    "ar1_logprior",
    "fit",
    "jackknife_log_se",
    "obs_loglik",
    "onset_prior_mean",
    "ratio_cv",
    "theta",
    "trapezoid_alpha",
]
