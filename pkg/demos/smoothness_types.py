"""Non-smooth comparisons are allowed only on values that carry no tangent.

A value drawn with a reparameterized sampler is a smooth function of θ, so
comparing it with `<=` would silently drop the derivative of the branch
boundary. The checker rejects such programs and names the variable.

    python3 demos/smoothness_types.py
"""

from adev import corpus
from adev.errors import TypeCheckError
from adev.printer import show_type
from adev.typecheck import check_entry

for name in ("normal_threshold", "smoothness_accept_1", "smoothness_accept_2",
             "smoothness_reject"):
    program = corpus.load(name)
    print(f"-- {name}")
    print(program.text.strip())
    try:
        entry = check_entry(program)
        print(f"=> accepted at type {show_type(entry.type)}\n")
    except TypeCheckError as e:
        print(f"=> rejected: {e}\n")
