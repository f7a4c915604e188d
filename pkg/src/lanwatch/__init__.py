"""Honeypot-aided LAN anomaly detection.

Per-protocol feature logs are merged into a time-ordered event stream,
scanned with sliding/expanding windows, and each window is screened by
two complementary passes: a horizontal pass over per-node time-series
signatures and a vertical pass over per-call points in each protocol
space. Detection is EVT-based (with a one-class SVM baseline) and
results are evaluated against honeypot-access ground truth.
"""

__version__ = "0.1.0"
