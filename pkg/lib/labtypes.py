from typing import NewType

import numpy as np
from numpy.typing import NDArray

Probability = NewType('Probability', float)  # in [0, 1]

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]
