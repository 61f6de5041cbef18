"""earmetrics: age and gender soft biometrics from ear images.

Subpackages and modules:

- ``geometry``: landmark types, the 16 geometric features, normalization and
  importance-based feature selection;
- ``tabular``: from-scratch logistic regression, random forest, RBF SVM and a
  3-hidden-layer MLP, plus evaluation and model files;
- ``augment``: the deterministic 55-variant image augmentation engine;
- ``tinycnn``: a small convolutional network with backprop, crop pipelines,
  head replacement and two-stage fine-tuning;
- ``dataset``: subject records, age binning and stratified
  subject-independent splits;
- ``cli``: the ``earmetrics`` command-line entry point.
"""

__version__ = "0.1.0"
