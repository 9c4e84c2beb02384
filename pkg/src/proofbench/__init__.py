"""proofbench: a desk-scale workbench for learning-guided theorem proving.

A connection-tableau prover, a canonical-skolem clausifier, a finite
model finder, naive-Bayes premise selection and an inductive-deductive
loop that feeds found proofs and countermodels back into selection,
plus a batch harness reproducing re-proving / library / challenge /
train-test experiment shapes on generated corpora.
"""

__version__ = "0.1.0"
