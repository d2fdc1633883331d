"""Python interface to the trapped-ion qubit coherence simulator."""

try:
    from ionsim._ionsim import (
        ConfigError,
        FitError,
        SeqError,
        SequenceError,
        __version__,
        config_hash,
        default_config,
        figure_names,
        fit,
        motional_element,
        parse_program,
        run_figure,
        run_program,
        susceptibility_khz_per_mgauss,
        validate_program,
    )
except ImportError:  # build-tree layout: the module sits next to the package
    from _ionsim import (
        ConfigError,
        FitError,
        SeqError,
        SequenceError,
        __version__,
        config_hash,
        default_config,
        figure_names,
        fit,
        motional_element,
        parse_program,
        run_figure,
        run_program,
        susceptibility_khz_per_mgauss,
        validate_program,
    )

__all__ = [
    "ConfigError",
    "FitError",
    "SeqError",
    "SequenceError",
    "__version__",
    "config_hash",
    "default_config",
    "figure_names",
    "fit",
    "motional_element",
    "parse_program",
    "run_figure",
    "run_program",
    "susceptibility_khz_per_mgauss",
    "validate_program",
]
