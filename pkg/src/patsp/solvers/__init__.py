from .base import (
    EPS,
    PORTFOLIO,
    WORK_UNIT_SECONDS,
    Budget,
    Clock,
    SolveResult,
    SolverId,
    WallClock,
    WorkClock,
    make_clock,
)
from .construct import HELD_KARP_MAX_N, InstanceTooLarge, cheapest_insertion, held_karp, nn_order
from .portfolio import (
    run_solver,
    solve_2opt,
    solve_3opt_enhanced,
    solve_adaptive,
    solve_held_karp,
    solve_nn,
)
