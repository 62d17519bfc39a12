"""Shared fixtures: a small self-contained project directory whose corpus
splits into a quantum-computing community (the field under evaluation) and
unrelated protein papers that retrieval should leave behind."""
import textwrap
from types import SimpleNamespace

import pytest

MINI_CORPUS = """\
#index q1
#* Quantum Computing Advances
#@ Alice Q
#t 2001
#c QIP
#! Advances in quantum computing with qubit gates.

#index q2
#* Quantum Error Correction
#@ Alice Q, Bob Q
#t 2002
#c QIP
#! Quantum error correction for computing hardware.
#% q1

#index q3
#* Qubit Entanglement Methods
#@ Bob Q, Carol Q
#t 2003
#c STOC
#! Entanglement methods for quantum computing devices.
#% q1
#% q2

#index q4
#* Topological Quantum Computing
#@ Alice Q, Carol Q
#t 2004
#c FOCS
#! Topological approaches to quantum computing.
#% q2

#index q5
#* Quantum Algorithms Survey
#@ Alice Q, Dave Q
#t 2005
#c SIGACT
#! A survey of algorithms for quantum computing machines.
#% q1

#index q6
#* Quantum Hardware Benchmarks
#@ Dave Q, Eve Q
#t 2006
#c QIP
#! Benchmarking quantum computing hardware at scale.
#% q5

#index q7
#* Quantum Complexity Notes
#@ Frank Q
#t 2007
#c ECCC
#! Complexity classes for quantum computing models.

#index p1
#* Protein Folding Dynamics
#@ Grace P
#t 2001
#c RECOMB
#! Molecular dynamics of protein folding.

#index p2
#* Protein Structure Prediction
#@ Grace P, Heidi P
#t 2002
#c ISMB
#! Predicting protein structures from sequences.
#% p1

#index p3
#* Genome Pathway Analysis
#@ Heidi P
#t 2003
#c PSB
#! Pathway analysis over genome annotations.
"""

MINI_EXPERTS = "Alice Q\nBob Q\nCarol Q\nDave Q\n"

MINI_CONFIG = """\
[corpus]
path = corpus.txt

[experts]
dir = experts
fields = QC
query.qc = quantum computing

[model]
kind = lsi
k = 2 3
rho = 0.1
gamma = 0.0
mode = binary

[cascade]
p = 0.3
reps = 50
seeds = 10
seed = 7

[eval]
split_seed = 0

[run]
seed = 0
threads = 1
"""


def write_project(root, corpus=MINI_CORPUS, experts=MINI_EXPERTS,
                  config=MINI_CONFIG, field="QC"):
    root.mkdir(parents=True, exist_ok=True)
    (root / "corpus.txt").write_text(corpus, encoding="utf-8")
    expert_dir = root / "experts"
    expert_dir.mkdir(exist_ok=True)
    (expert_dir / f"{field}.txt").write_text(experts, encoding="utf-8")
    config_path = root / "config.ini"
    config_path.write_text(textwrap.dedent(config), encoding="utf-8")
    return SimpleNamespace(
        root=root,
        config=config_path,
        corpus=root / "corpus.txt",
        expert_dir=expert_dir,
        cache=root / "cache",
        out=root / "out",
    )


@pytest.fixture
def mini_project(tmp_path):
    return write_project(tmp_path / "proj")
