import os
import sys

import pytest
import torch

sys.path.insert(0, os.path.dirname(__file__))

torch.set_num_threads(1)

from helpers import (  # noqa: E402
    receiving_instance,
    transfer_ontology,
    transfer_ontology_dict,
)


@pytest.fixture
def toy_ontology():
    return transfer_ontology()


@pytest.fixture
def toy_ontology_dict():
    return transfer_ontology_dict()


@pytest.fixture
def toy_instance():
    return receiving_instance()
