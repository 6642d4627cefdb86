import hashlib
import json
import platform

import numpy as np
import pandas as pd
import scipy

ANALYSIS_VERSION = '1.0.0'

LIBRARY_VERSIONS = {
    'python': platform.python_version(),
    'numpy': np.__version__,
    'scipy': scipy.__version__,
    'pandas': pd.__version__,
}

# Remainder base used for the main inequality; the printed variant is recorded alongside.
REMAINDER_CONVENTION = 'det(G2)'


def _canonical(payload) -> str:
    return json.dumps(payload, sort_keys=True, default=str, allow_nan=True)


# To be called at the start of a sweep
def get_initial_provenance(config: dict) -> dict:
    return {
        'analysis_version': ANALYSIS_VERSION,
        'library_versions': LIBRARY_VERSIONS,
        'remainder_convention': REMAINDER_CONVENTION,
        'config': config,
    }


# To be called once every record of the sweep is in
def finalize_provenance(provenance_dict: dict, records: list) -> dict:
    """
    Adds the reproducibility hash and record count to the provenance dictionary.
    No wall-clock fields: two identical runs must produce identical files.
    """
    provenance_dict['record_count'] = len(records)
    provenance_dict['reproducibility_hash_sha256'] = provenance_hash(records)
    return provenance_dict


def provenance_hash(records) -> str:
    return hashlib.sha256(_canonical(records).encode('utf-8')).hexdigest()


def instance_digest(density: np.ndarray, observables) -> str:
    """sha256 over the raw complex entries of D and every observable, in order."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(density, dtype=complex).tobytes())
    for matrix in observables:
        digest.update(np.ascontiguousarray(matrix, dtype=complex).tobytes())
    return digest.hexdigest()
