"""Wasserstein-autoencoder topic modeling on the probability simplex.

Subpackages: :mod:`wlda.nn` (MLP + Adam), :mod:`wlda.simplex` (Dirichlet
sampling, diffusion kernel, MMD), :mod:`wlda.model` (the autoencoding topic
model), :mod:`wlda.gibbs` (collapsed-Gibbs LDA baseline), :mod:`wlda.corpus`
(corpora and file formats), :mod:`wlda.metrics` (TU/NPMI/recovery metrics),
:mod:`wlda.cli` (the ``wlda`` command).
"""

__version__ = "0.1.0"
