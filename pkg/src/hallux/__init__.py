"""hallux: train activity classifiers with privileged modalities, infer with
inertial data alone by hallucinating the missing streams' features."""

__version__ = "0.1.0"
