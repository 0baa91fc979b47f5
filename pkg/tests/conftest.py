import os

import pytest

from lctdv.certify import lemma_path, load_lemma_file
from lctdv.surface import load_surface_file, surface_path

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'fixtures')


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def config():
    return {
        'fixtures_dir': FIXTURES_DIR,
        'blowup_budget': 32,
        'chain_depth': 12,
        'known_issues': os.path.join(FIXTURES_DIR, 'known_issues.yaml'),
        'skip_allowlist': [
            {'degree': 3, 'singularities': 'E6'},
            {'degree': 3, 'singularities': 'A5+A1'},
            {'degree': 3, 'singularities': '3A2'},
        ],
    }


@pytest.fixture
def surface():
    def load(name):
        return load_surface_file(surface_path(FIXTURES_DIR, name))
    return load


@pytest.fixture
def lemma():
    def load(name):
        return load_lemma_file(lemma_path(FIXTURES_DIR, name))
    return load
