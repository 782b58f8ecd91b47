"""Build finite models of a few small dynamical systems from epsilon-cycles
and print how well each one approximates its system."""
from resfin import fixtures
from resfin.errors import NoChain
from resfin.zsystems import model_from_chains


def main():
    for name, sample, eps in fixtures.chain_fixtures():
        try:
            w = model_from_chains(sample, eps)
        except NoChain:
            print(f"{name:32s} no epsilon-cycle at {eps}")
            continue
        print(f"{name:32s} eps={str(eps):5s} elements={w.action.size:4d} "
              f"density={float(w.density_defect):.3f} equivariance={float(w.equivariance_defect):.3f} "
              f"{'ok' if w.passed else 'FAILS'}")


if __name__ == "__main__":
    main()
