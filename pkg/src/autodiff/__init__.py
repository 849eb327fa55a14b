from . import ops
from .forward import jvp
from .optim import AdamState, adam_step
from .tensor import Tape, TapeEntry, Tensor, as_tensor, backward
