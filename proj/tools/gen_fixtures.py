#!/usr/bin/env python3
"""Writes the bundled channel fixtures into fixtures/.

The parameterized three-level families are instantiated at a fixed set of
angles; the file name carries repr(phi) so it is reproducible.
"""

import json
import math
import pathlib
import sys

import numpy as np

PHIS = [math.pi / 4, math.pi / 3, 1.0, 2.0]
R2 = math.sqrt(2.0)


def example1(phi):
    s, c = math.sin(phi), math.cos(phi)
    a1 = np.array([[0.3, 1j * s / R2, -0.3],
                   [-1j * s / R2, 0.0, -1j * s / R2],
                   [-0.3, 1j * s / R2, 0.3]])
    a2 = np.array([[0.4 - c / 2, 0.0, -c / 2 - 0.4],
                   [0.0, c, 0.0],
                   [-c / 2 - 0.4, 0.0, 0.4 - c / 2]])
    return [a1, a2]


def example2(phi):
    s, c = math.sin(phi), math.cos(phi)
    q = 1 / (4 * R2)
    a1 = np.array([[q, -q - 1j * s / R2, 0.25 - 0.5j * s],
                   [-q + 1j * s / R2, q, -0.25 - 0.5j * s],
                   [0.25 + 0.5j * s, -0.25 + 0.5j * s, 1 / (2 * R2)]])
    a2 = np.array([[q - c / 4, -3 * c / 4 - q, 0.25 - c / (2 * R2)],
                   [-3 * c / 4 - q, q - c / 4, c / (2 * R2) - 0.25],
                   [0.25 - c / (2 * R2), c / (2 * R2) - 0.25, c / 2 + 1 / (2 * R2)]])
    a3 = np.array([[q, -q + 0.5j * s, 0.25 + 1j * s / (2 * R2)],
                   [-q - 0.5j * s, q, -0.25 + 1j * s / (2 * R2)],
                   [0.25 - 1j * s / (2 * R2), -0.25 - 1j * s / (2 * R2), 1 / (2 * R2)]])
    return [a1, a2, a3]


def two_generator_algebra():
    r6 = math.sqrt(6.0)
    a1 = np.array([[1, -1, 1], [1 / R2, R2, 0], [-1 / R2, 0, R2]]) / r6
    a2 = np.array([[R2, 1 / R2, -1 / R2], [-1, 1.5, 0.5], [1, 0.5, 1.5]]) / r6
    return [a1, a2]


PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
}


def encode(name, kraus, metadata):
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    return {
        "name": name,
        "dim": int(kraus[0].shape[0]),
        "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in k] for k in kraus],
        "metadata": metadata,
    }


def fixtures():
    for phi in PHIS:
        yield encode(f"example1_phi_{phi!r}", example1(phi), {"family": "example1", "phi": phi})
        yield encode(f"example2_phi_{phi!r}", example2(phi), {"family": "example2", "phi": phi})
    yield encode("paper_sec4_2", two_generator_algebra(), {"family": "two_generator_algebra"})
    yield encode("identity_channel", [np.eye(3)], {"family": "identity"})
    p = 0.3
    yield encode("depolarizing_qubit",
                 [math.sqrt(1 - 3 * p / 4) * PAULI["I"]] + [math.sqrt(p / 4) * PAULI[k] for k in "XYZ"],
                 {"family": "depolarizing", "p": p})
    g = 0.4
    yield encode("amplitude_damping_qubit",
                 [np.array([[1, 0], [0, math.sqrt(1 - g)]]), np.array([[0, math.sqrt(g)], [0, 0]])],
                 {"family": "amplitude_damping", "gamma": g})
    w = np.exp(2j * math.pi / 3)
    yield encode("unitary_qutrit_phase", [np.diag([1, w, w * w])], {"family": "unitary"})
    yield encode("pauli_xyz_qubit", [PAULI[k] / math.sqrt(3) for k in "XYZ"], {"family": "pauli"})


def main(argv):
    out = pathlib.Path(argv[1]) if len(argv) > 1 else pathlib.Path(__file__).resolve().parent.parent / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    for fx in fixtures():
        (out / f"{fx['name']}.json").write_text(json.dumps(fx, indent=1) + "\n")


if __name__ == "__main__":
    main(sys.argv)
