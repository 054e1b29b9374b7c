"""Imports count as bindings when nothing is curated."""

import os
import os.path as osp
from json import dumps as _dumps
from json import loads

value = osp.join("a", "b")
