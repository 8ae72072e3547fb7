import numpy as np

from cliquesep import CsfLaw, PotentialTable


def random_csf(n: int, seed: int, scale: float = 0.6) -> CsfLaw:
    """Full-support factorisation law with independent normal log-potentials."""
    rng = np.random.default_rng(seed)
    phi = PotentialTable(overrides={m: float(rng.normal(0.0, scale)) for m in range(1 << n)})
    psi = PotentialTable(overrides={m: float(rng.normal(0.0, scale)) for m in range(1 << n)})
    return CsfLaw(n, phi, psi)


def random_cef(n: int, seed: int, scale: float = 0.6) -> CsfLaw:
    """Law with one shared potential per set (the structurally-Markov subfamily)."""
    rng = np.random.default_rng(seed)
    shared = {m: float(rng.normal(0.0, scale)) for m in range(1 << n)}
    return CsfLaw(n, PotentialTable(overrides=shared), PotentialTable(overrides=dict(shared)))
