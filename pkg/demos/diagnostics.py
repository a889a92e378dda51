"""
Perturbation and concentration diagnostics.

1. Noisy link-probability estimates move the distance matrix ``D`` by at
   most ``4 T sum ||Phat_i - P_i||_F^2``; the aligned eigenvector error then
   stays under ``16 ||Dhat - D||_F^2 / gamma^2``.
2. Log moments of blockmodel graphs concentrate as ``n`` grows.

    python demos/diagnostics.py
"""
import numpy as np

from netclust.graphs import BlockmodelGraphon, latent_positions
from netclust.ncge import davis_kahan_check, distance_perturbation_bound, frobenius_distance_matrix
from netclust.nclm import concentration_probe


def perturbation(T=12, n=100, noise=(0.01, 0.05, 0.1)):
    rng = np.random.default_rng(0)
    xi = latent_positions(n, 0, 1)
    Pa = BlockmodelGraphon.planted_partition(0.5, 0.1, 2).link_probability_matrix(xi)
    Pb = BlockmodelGraphon.planted_partition(0.3, 0.3, 2).link_probability_matrix(xi)
    ps = [Pa] * (T // 2) + [Pb] * (T - T // 2)
    D = frobenius_distance_matrix(ps)
    print("noise  ||dD||^2  bound     eigvec err  DK bound")
    for s in noise:
        hats = []
        for P in ps:
            E = rng.normal(scale=s, size=P.shape)
            hats.append(np.clip(P + (E + E.T) / 2, 0, 1))
        lhs, rhs = distance_perturbation_bound(ps, hats)
        dk = davis_kahan_check(D, frobenius_distance_matrix(hats), 2)
        print(f"{s:<5}  {lhs:8.3g}  {rhs:8.3g}  {dk.lhs:10.3g}  {dk.rhs:8.3g}")


def concentration(sizes=(100, 200, 400), J=5, reps=50):
    gr = BlockmodelGraphon.planted_partition(0.2, 0.1, 2)
    print("\nstd of log m_2..m_5 over", reps, "samples")
    for n in sizes:
        res = concentration_probe(gr, n, J, reps=reps, seed=0)
        print(f"n={n:<4d}", "  ".join(f"{v:.4f}" for v in res.std_log))


if __name__ == "__main__":
    perturbation()
    concentration()
