"""Classical long-range Ising contours and quantum stoquastic Gibbs states on finite lattices."""
import os as _os

# STOQLAB_THREADS caps BLAS threads when set before numpy loads
if _os.environ.get("STOQLAB_THREADS"):
    for _v in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_v, _os.environ["STOQLAB_THREADS"])

__version__ = "0.1.0"
