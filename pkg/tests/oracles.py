"""Frozen reference values.

Norms below were computed once with mpmath's symmetric eigensolver at 40
digits, independently of the package code, and rounded to 17 digits.
"""

# (p, n): ||h||
MP_NORMS = {
    (1, 4): 2.8284271247461900976,
    (1, 5): 2.9664479891433719264,
    (1, 6): 3.0955735647785597419,
    (2, 7): 2.7248705305112290728,
    (3, 8): 2.6131259297527530557,
    (4, 11): 2.6262255063832527207,
    (5, 13): 2.5989496730498198974,
    (7, 17): 2.5930103343537416220,
}

# dense numpy eigvalsh of the 5741 x 5741 periodic Jacobi matrix at 2378/5741
DENSE_NORM_SILVER_5741 = 2.5910474421597356
# dense numpy eigvalsh at 985/2378
DENSE_NORM_SILVER_2378 = 2.5910474581534064

# published value of the constant at the silver angle (7 significant digits)
SILVER_CONSTANT = 1.5437772
# lower bound on every norm from the literature
NORM_LOWER_BOUND = 2.56769
