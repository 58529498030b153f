"""The `aet` command line, which runs experiments from configuration files:

```shell
aet simulate --config heart_lung --out runs/heart
aet reconstruct --config heart_lung --out runs/heart
aet check
```

The pipelines behind the subcommands can also be called from Python code:

```python
from aettools.cli.pipelines import run_simulate, run_reconstruct
```

"""

from .main import aet

__all__ = ("aet",)
