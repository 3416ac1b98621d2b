"""System-dynamics model of sustainable development.

Modules: ``kernel`` (closed-form indicators), ``engine`` (stock-flow
stepping), ``calibration`` (least-squares fits), ``scenario`` (documents,
overrides, horizon targets), ``io`` (file formats) and ``cli``.
"""

__version__ = "0.1.0"
