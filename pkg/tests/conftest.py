import sys
from pathlib import Path

import numpy as np
import pytest

from fisheyekit.models import (
    EUCM,
    UCM,
    Division,
    DoubleSphere,
    Equidistant,
    ExtendedEquidistant,
    ExtendedOrthographic,
    FieldOfView,
    GeneralPerspective,
    OnImagePolynomial,
    Orthographic,
    Pinhole,
    PolynomialMixed,
    PolynomialOdd,
    Stereographic,
)

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "scripts"))

# One representative per model family, plus a few edge parameterizations.
SAMPLE_MODELS = [
    Pinhole(1.0),
    Equidistant(1.075),
    Stereographic(0.8),
    Orthographic(1.3),
    ExtendedOrthographic(1.3, 0.2),
    ExtendedEquidistant(1.0, 0.1),
    PolynomialOdd((1.0, -0.05, 0.003)),
    PolynomialMixed((1.0, 0.05, -0.03, 0.004)),
    OnImagePolynomial((1.0, -0.05, 0.002)),
    Division(0.2, 1.1),
    FieldOfView(0.93, 1.0),
    UCM(0.6, 1.2),
    UCM(0.3, 0.9),
    EUCM(0.6, 1.2, 1.0),
    EUCM(0.7, 0.6, 1.1),
    DoubleSphere(0.2, 0.6, 1.0),
    DoubleSphere(0.0, 0.4, 1.0),
    GeneralPerspective(3.0, 2.0, 1.0),
]


def model_id(model):
    return f"{model.kind}-" + "-".join(f"{v:g}" for v in model.params().values())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rays(model, n, rng, fraction=0.95):
    """Unit rays with field angle uniform in [0, fraction * theta_max] and random azimuth."""
    theta = rng.uniform(0.0, fraction * model.theta_max(), n)
    phi = rng.uniform(-np.pi, np.pi, n)
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1)
