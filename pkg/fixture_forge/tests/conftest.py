import numpy as np
import pytest
from sklearn.ensemble import RandomForestClassifier, RandomForestRegressor
from sklearn.tree import DecisionTreeClassifier

from fixture_forge.datasets import blobs, sine, split_band


@pytest.fixture(scope="session")
def blobs_model():
    rng = np.random.default_rng(11)
    X, y = blobs(rng)
    model = RandomForestClassifier(n_estimators=3, max_depth=2, random_state=11)
    model.fit(X, y)
    return model, X, y


@pytest.fixture(scope="session")
def sine_model():
    rng = np.random.default_rng(13)
    X, y = sine(rng)
    model = RandomForestRegressor(n_estimators=4, max_depth=3, random_state=13)
    model.fit(X, y)
    return model, X, y


@pytest.fixture(scope="session")
def band_model():
    rng = np.random.default_rng(17)
    X, y = split_band(rng)
    model = DecisionTreeClassifier(max_depth=1, random_state=17)
    model.fit(X, y)
    return model, X, y
