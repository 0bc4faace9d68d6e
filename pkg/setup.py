import os

import numpy as np
from setuptools import Extension, setup

extensions = []
if os.environ.get("LCXPLAN_NO_EXTENSION", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        extensions = cythonize(
            [Extension("lcxplan._ckernels", ["src/lcxplan/_ckernels.pyx"],
                       include_dirs=[np.get_include()],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=extensions)
