"""HTTP adapter exposing vision/language experts over a small JSON protocol.

Endpoints: /v1/search, /v1/segment, /v1/detect, /v1/complete, /v1/health.
Model backends are pluggable; the shipped stub backend produces deterministic
schema-correct outputs so clients can integration-test without GPUs.
"""

__version__ = "0.1.0"
