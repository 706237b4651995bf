import pytest

from pbrepair import parse

MINMAX_SRC = """\
prog minmax(input1, input2, input3, most, least)
pre: true
most = input1;
least = input1;
if (most < input2) {
  most = input2;
}
if (most < input3) {
  most = input3;
}
if (input2 < least) {
  least = input2;
}
if (input3 < least) {
  least = input3;
}
post: (most == input1 || most == input2 || most == input3) && (most >= input1 && most >= input2 && most >= input3) && (least == input1 || least == input2 || least == input3) && (least <= input1 && least <= input2 && least <= input3)
"""

# Two-iteration counting loop: the propagation example's control-flow path
# is the one taking the loop body twice.
COUNT_LOOP_SRC = """\
prog count(x)
pre: x == 0
while (x < 2) {
  x = x + 1;
}
post: x == 2
"""


@pytest.fixture
def minmax():
    return parse(MINMAX_SRC, 2)


@pytest.fixture
def count_loop():
    return parse(COUNT_LOOP_SRC, 2)
