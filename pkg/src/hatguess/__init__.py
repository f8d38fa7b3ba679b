"""Hat guessing on graphs: exact small-scale solving, bound certificates for
G(n, p), closed-form predictions and seeded Monte Carlo checks."""

__version__ = "0.1.0"

from hatguess.graph import (
    EdgeListError,
    Graph,
    GnpParams,
    book,
    complete,
    cycle,
    empty,
    path,
    read_edge_list,
    sample_gnp,
    write_edge_list,
)
from hatguess.game import (
    Decision,
    GameOutcome,
    HGResult,
    Status,
    StrategyTable,
    decide_winnable,
    hg_exact,
    modular_strategy,
    verify_strategy,
)
from hatguess.bounds import (
    BookEmbedding,
    BoundCertificate,
    choose_d,
    book_lower_value,
    dsatur_coloring,
    find_book_embedding,
    greedy_clique,
    lower_bound_certificate,
    max_clique_exact,
    upper_bound_certificate,
    verify_certificate,
)
from hatguess.asymptotics import (
    PredictionWindow,
    chernoff_tail,
    common_neighbor_tail_bound,
    predicted_chi,
    predicted_omega,
    theorem_window,
    xx_solve,
)
from hatguess.montecarlo import (
    ExperimentReport,
    run_common_neighbor_trials,
    run_growth_experiment,
    run_pipeline_experiment,
)
