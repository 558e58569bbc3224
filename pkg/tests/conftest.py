import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from codetrim.grammar import builtin


@pytest.fixture(scope="session")
def c_grammar():
    return builtin("c")


@pytest.fixture(scope="session")
def js_grammar():
    return builtin("js")


# Nested-loop motivating fixture: the property holds either for the exact
# loop nest or for any program containing the key array access.
LOOP_SOURCE = """\
int s; int ad[3][2][1]; int i; int j; int k;
for (i = 0; i < 3; i++)
  for (j = 0; j < 2; j++)
    for (k = 0; k < 1; k++)
      s = s ^ ad[i][j][k];
"""

LOOP_SIGNATURE = "for(i=0;i<3;i++)for(j=0;j<2;j++)for(k=0;k<1;k++)s=s^ad[i][j][k];"
KEY_ACCESS = "ad[2][1][0]"

UNROLLED = "\n".join(
    f"s = s ^ ad[{i}][{j}][{k}];"
    for i in range(3) for j in range(2) for k in range(1))


def loop_property(text: str) -> bool:
    squeezed = "".join(text.split())
    return LOOP_SIGNATURE in squeezed or KEY_ACCESS in squeezed
