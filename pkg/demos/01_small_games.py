"""Exact hat guessing numbers of a few small graphs."""
# %%
from hatguess.game import decide_winnable, hg_exact, modular_strategy, verify_strategy
from hatguess.graph import Graph, complete, cycle, path

# %% the folklore strategy: on K_n with n colors, player i bets the total is i mod n
for n in range(2, 6):
    out = verify_strategy(complete(n), n, modular_strategy(n, n))
    print(f"K{n}, {n} colors: winning = {out.winning}")

# %% exact values, searching upward in q
for name, G in [("K3", complete(3)), ("P3", path(3)), ("C4", cycle(4)), ("C5", cycle(5))]:
    r = hg_exact(G, G.n + 1)
    print(name, "HG =", r.value, [e.status.value for e in r.evidence])

# %% a strategy for C4 with 3 colors, and the refutation at 4
d = decide_winnable(cycle(4), 3)
print([t.tolist() for t in d.strategy.tables])
print(decide_winnable(cycle(4), 4).reason)

# %% the house graph: a 4-cycle with a roof
house = Graph.from_edges(5, [(0, 1), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4)])
r = hg_exact(house, 5, time_limit=30)
print("house:", r.lower, r.upper, r.evidence[-1].reason)
