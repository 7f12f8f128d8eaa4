"""Published OOV-recognition (precision, recall, F-score) triples used to
validate the F-score arithmetic.

The 29 rows come from three published result tables of a low-resource speech
recognition study: a vocabulary-size sweep for each of two languages, plus an
architecture comparison whose first two rows repeat the first sweep's
vocab-3000 rows. The `consistent` flag records whether 2PR/(P+R) lies within
+-0.0005 of the printed F; the seven inconsistent rows are casualties of the
source rounding P and R to three decimals - and for one of them (group 1,
vocab 2000) the printed triple is inconsistent under any rounding: no P/R
pair rounding to 0.126/0.118 yields an F that rounds to 0.123.
"""

# (group, row label, precision, recall, fscore, consistent)
ROWS = [
    (1, "char", 0.067, 0.165, 0.095, True),
    (1, "500", 0.114, 0.152, 0.130, True),
    (1, "500+drop", 0.120, 0.209, 0.153, False),
    (1, "1000", 0.130, 0.144, 0.137, True),
    (1, "1000+drop", 0.126, 0.194, 0.153, True),
    (1, "2000", 0.126, 0.118, 0.123, False),
    (1, "2000+drop", 0.144, 0.198, 0.167, True),
    (1, "3000", 0.129, 0.099, 0.112, True),
    (1, "3000+drop", 0.156, 0.197, 0.174, True),
    (1, "4000", 0.124, 0.085, 0.101, True),
    (1, "4000+drop", 0.151, 0.183, 0.166, False),
    (1, "5000", 0.115, 0.070, 0.087, True),
    (1, "5000+drop", 0.137, 0.160, 0.148, True),
    (2, "char", 0.090, 0.162, 0.116, True),
    (2, "100", 0.087, 0.143, 0.108, True),
    (2, "100+drop", 0.101, 0.167, 0.126, True),
    (2, "500", 0.095, 0.126, 0.108, True),
    (2, "500+drop", 0.117, 0.172, 0.140, False),
    (2, "1000", 0.088, 0.096, 0.092, True),
    (2, "1000+drop", 0.118, 0.161, 0.137, False),
    (2, "2000", 0.070, 0.061, 0.066, False),
    (2, "2000+drop", 0.124, 0.160, 0.140, True),
    (2, "3000", 0.054, 0.039, 0.046, False),
    (2, "3000+drop", 0.116, 0.147, 0.130, True),
    (3, "transformer", 0.129, 0.099, 0.112, True),
    (3, "transformer+drop", 0.156, 0.197, 0.174, True),
    (3, "conformer", 0.188, 0.142, 0.162, True),
    (3, "conformer+drop", 0.194, 0.201, 0.197, True),
    (3, "conformer+sp+drop", 0.199, 0.255, 0.224, True),
]
