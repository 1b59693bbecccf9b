"""Step-size study for the fd route: eigen residuals as the difference steps shrink.

Usage: python3 scripts/fd_convergence.py [--level 1]
"""
import argparse

from sphere_jacobi.harmonic_jacobi import eigen_residual_harmonic, hopf_map, identity_map
from sphere_jacobi.sphere_core import LinearFunction, quadrature_grid
from sphere_jacobi.tolerances import DEFAULT
from sphere_jacobi.yangmills_jacobi import eigen_residual_ym, levi_civita_connection

LADDER = [(1e-3, 1e-2), (1e-4, 1e-3), (1e-5, 1e-3), (1e-5, 1e-4)]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--level", type=int, default=1)
    args = parser.parse_args()

    cases = [
        ("identity-s3", lambda p: eigen_residual_harmonic(identity_map(3), LinearFunction.coordinate(0, 4),
                                                          quadrature_grid(3, args.level), "fd", p).residual),
        ("hopf", lambda p: eigen_residual_harmonic(hopf_map(), LinearFunction.coordinate(0, 4),
                                                   quadrature_grid(3, args.level), "fd", p).residual),
        ("levicivita-ts5", lambda p: eigen_residual_ym(levi_civita_connection(5), LinearFunction.coordinate(0, 6),
                                                       quadrature_grid(5, args.level), "fd", p).residual),
    ]
    print(f"{'object':<16}{'h1':>10}{'h2':>10}{'residual':>14}")
    for name, fn in cases:
        for h1, h2 in LADDER:
            profile = DEFAULT.with_overrides(fd_step_first=h1, fd_step_second=h2)
            print(f"{name:<16}{h1:>10.0e}{h2:>10.0e}{fn(profile):>14.3e}")


if __name__ == "__main__":
    main()
