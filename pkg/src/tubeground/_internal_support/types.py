import os
from typing import Union

PathLikeType = Union[str, os.PathLike]
