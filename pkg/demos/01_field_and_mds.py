"""
Field arithmetic and the base MDS code
======================================

Bytes are elements of GF(2^8).  Addition is XOR; multiplication goes
through log/antilog tables.  The base code is a systematic Cauchy code.
"""

import numpy as np

from pbcodes import gf, mds

print("0x53 + 0xCA =", hex(gf.add(0x53, 0xCA)))
print("0x80 * 0x02 =", hex(gf.mul(0x80, 0x02)))
print("inverse of 0x53 is", hex(gf.inv(0x53)))

# an (8,4) code: 4 data bytes, 4 parity bytes
code = mds.make_code(8, 4)
print("parity rows:\n", code.parity)

u = np.frombuffer(b"data", dtype=np.uint8)
c = mds.encode(code, u)
print("codeword:", c)

# any 4 of the 8 symbols are enough
keep = {1: c[1], 4: c[4], 6: c[6], 7: c[7]}
print("decoded from nodes 1,4,6,7:", bytes(mds.reconstruct(code, keep)))
