"""Independent slow oracles for cross-checking the library's fast paths.

These deliberately avoid the vectorized code: energies come from explicit
per-term loops over bits and manifolds from a plain scan over all auxiliary
configurations.
"""

from symgadget.spin_model import IsingXZHamiltonian, Z1, Z2


def slow_diagonal_energy(H: IsingXZHamiltonian, index: int) -> float:
    """Classical energy via explicit bit loops (independent of .diagonal())."""
    energy = 0.0
    for term in H.terms:
        if term.axis == Z1:
            bit = (index >> term.qubits[0]) & 1
            energy += term.coeff * (1 - 2 * bit)
        elif term.axis == Z2:
            bi = (index >> term.qubits[0]) & 1
            bj = (index >> term.qubits[1]) & 1
            energy += term.coeff * (1 - 2 * bi) * (1 - 2 * bj)
    return energy


def slow_manifold(spec) -> dict[int, tuple[int, float]]:
    """data config -> (best aux config, energy), by direct scan."""
    from symgadget.gadget import build_gadget, bias_to_aux_fields

    H = build_gadget(spec)
    z = spec.eta * bias_to_aux_fields(spec.bias, spec.n)
    n = spec.n
    result = {}
    for data in range(1 << n):
        best = None
        for aux in range(1 << n):
            index = data + (aux << n)
            e = slow_diagonal_energy(H, index)
            for i in range(n):
                bit = (aux >> i) & 1
                e += z[i] * (1 - 2 * bit)
            if best is None or e < best[1]:
                best = (aux, e)
        result[data] = best
    return result
