"""Substitution Delone multisets, inflation systems and self-affine multi-tiles."""

__version__ = "0.1.0"

from .errors import (BudgetError, ConfigurationError, DeloneError,  # noqa: E402
                     InconsistencyError, MultiplicityOverflow,
                     PartialEnumerationError, SpecError, StateError,
                     UnsupportedDimension, ValidationError, WindowTooSmall)
from .multiset import (MULTIPLICITY_CAP, RATIONAL, GridMode, Multiset,  # noqa: E402
                       MultisetFamily, RationalMode)
from .system import (AdaptedNorm, InflationSystem, PerronCondition,  # noqa: E402
                     PerronReport, generation_radius, inflate, is_primitive,
                     iterate_system, iterated_digit_sets, perron_eigenvalue,
                     validate)
from .cycles import (BudgetExhausted, Cycle, Discrete, GenerationRun,  # noqa: E402
                     NotIrreducible, Seed, certify, decompose, dichotomy_probe,
                     enumerate_cycles, generate, multiplicity_by_paths,
                     seed_from_cycle, solution_window, valid_window)
from .analysis import (Box, denseness_scan, digit_equidiscreteness,  # noqa: E402
                       discreteness_scan, growth_counter)
from .tiles import (TileApprox, address_point, check_tiling,  # noqa: E402
                    measure_estimate, self_replicating_check, tile_iterate)
from .io import dump_spec, load_spec, parse_spec, read_points, write_points  # noqa: E402
from .render import render_svg  # noqa: E402

__all__ = [name for name in dir() if not name.startswith("_")]
