"""Synthesis of correlated randomness: rate regions, polyhedral tools, and
finite-blocklength codec simulations.

Subpackages by concern:

* :mod:`corrsynth.probability` / :mod:`corrsynth.typicality` -- finite PMFs,
  information measures, robust letter typicality.
* :mod:`corrsynth.polyhedra` -- exact rational linear-inequality systems and
  Fourier-Motzkin projection with symbolic constants.
* :mod:`corrsynth.rate_region` -- auxiliary-channel rate bounds and frontier
  search for the point-to-point and distributed settings.
* :mod:`corrsynth.codec_ptp` / :mod:`corrsynth.codec_dist` -- explicit random
  codebook constructions and exact induced distributions.
* :mod:`corrsynth.harness` -- reproducible experiments and concentration
  checks; :mod:`corrsynth.cli` -- command line front end.
"""

__version__ = "0.1.0"
