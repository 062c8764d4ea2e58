"""readmit: 30-day hospital readmission prediction from raw claims data.

Pipeline: parse the three claim datasets, group claims into episodes,
identify admissions and label 30-day readmissions, extract nine predictor
families, one-hot encode, then train and evaluate logistic regression
(with and without likelihood-ratio feature selection), PCA-based
regression, a random forest grid search, and a linear SVM cost grid.
"""

__version__ = "0.1.0"
