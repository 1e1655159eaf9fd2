"""Wire-protocol constants shared with clients.

The five level names and the prompt template are part of the HTTP
contract; clients depend on these exact strings.
"""

LEVEL_NAMES = ("inferior", "worse", "similar", "better", "superior")

INSTRUCTION_TEMPLATE = (
    "Compared with the first image <img1>, "
    "how is the quality of the second image <img2>?"
)

#: the level word is the next token generated after this prefix
RESPONSE_PREFIX = "The quality of the second image is"

COMPARE_PATH = "/v1/compare"
HEALTH_PATH = "/healthz"
