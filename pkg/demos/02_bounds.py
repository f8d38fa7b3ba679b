"""Certified lower and upper bounds on sampled G(n, p)."""
# %%
from hatguess.asymptotics import theorem_window
from hatguess.bounds import choose_d, lower_bound_certificate, upper_bound_certificate, verify_certificate
from hatguess.graph import sample_gnp

n, p = 3000, "4/5"

# %%
w = theorem_window(n, p)
print("choose_d:", choose_d(n, p), "window:", w.lower_value, "to", round(w.upper_value, 1))

# %% a book: a d-clique plus d^(d+3) common neighbors
G = sample_gnp(n=n, p=p, seed=1)
lo = lower_bound_certificate(G, p_hint=p)
up = upper_bound_certificate(G)
print(lo.kind, "d =", lo.d, "value", lo.value, "petals", len(lo.petals))
print(up.kind, "value", up.value)
print(verify_certificate(G, lo), verify_certificate(G, up))

# %% tamper with the certificate and watch the check fail
bad = lo.to_dict()
bad["petals"] = bad["petals"][:10]
print(verify_certificate(G, bad).reason)
