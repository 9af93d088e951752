"""k-UpCCGS'D singlet energy versus k on the CH2 fixture, with embedded seeding.

    python3 scripts/k_convergence.py [--kmax 3] [--value 1.15] [--family UpCCGS'D]
"""

import argparse

from excitedvqe.exact import fci_solve
from excitedvqe.scan import RunConfig, _policy, minimize_k_sequence, pes_minimum, point_integrals
from excitedvqe.vqe import Objective


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kmax", type=int, default=3)
    ap.add_argument("--value", type=float, help="C-H length; default is the FCI singlet minimum")
    ap.add_argument("--family", default="UpCCGS'D")
    ap.add_argument("--register", default="S1")
    args = ap.parse_args()

    value = args.value or pes_minimum("CH2")
    cfg = RunConfig(molecule="CH2", values=(value,), register=args.register,
                    ansatz=f"{args.kmax}-{args.family}")
    mo = point_integrals(cfg, value)
    sol = fci_solve(mo, mo.n_electrons, 0.0, n_roots=10)
    e_fci = sol.energies[sol.lowest_with_spin(0.0)]
    obj = Objective.from_integrals(mo, cfg.ansatz, cfg.register, mo.n_electrons)
    print(f"CH2 at {value:.2f} A, singlet FCI {e_fci:.10f}")
    for k, res in enumerate(minimize_k_sequence(obj, args.kmax, _policy(cfg)), start=1):
        print(f"k={k}  E={res.energy:.10f}  E-FCI={1e3 * (res.energy - e_fci):8.4f} mHa  "
              f"<S2>={res.s2_expectation:.4f}  iters={res.iterations}")


if __name__ == "__main__":
    main()
