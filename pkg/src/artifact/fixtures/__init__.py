"""Bundled JSON fixtures: vacuum, genus1, helicoid potentials and the helicoid blowup config."""
import json
from importlib import resources

NAMES = ("vacuum", "genus1", "helicoid", "helicoid_blowup")


def fixture_path(name):
    return resources.files(__name__) / f"{name}.json"


def fixture_dict(name):
    return json.loads(fixture_path(name).read_text())


def load_fixture(name):
    """Potential fixtures come back as potentials, configs as dicts."""
    from ..io import potential_from_dict
    d = fixture_dict(name)
    return potential_from_dict(d) if "kind" in d else d
