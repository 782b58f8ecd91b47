"""Paradox search on every bundled action context.

The boundary of the free group gets a certificate, which is re-verified by
recounting; the finite actions only admit invariant measures.
"""
from resfin import fixtures
from resfin.paradox import decide_paradoxical, invariant_measure_lp, verify_certificate


def main():
    for name, _, _, _, ctx in fixtures.bundled_contexts():
        A = tuple(ctx.source)
        cert = decide_paradoxical(ctx, A, 2, 1)
        if cert is not None:
            print(f"{name}: paradoxical, {len(cert.pieces)} pieces, verified={verify_certificate(cert, ctx)}")
            continue
        mu = invariant_measure_lp(ctx, A)
        print(f"{name}: no certificate; invariant measure {'found' if mu else 'missing'}")


if __name__ == "__main__":
    main()
