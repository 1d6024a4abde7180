# cython: language_level=3
# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled action-search kernel.

Twin of the pure-Python fallback module with identical semantics:
depth-first search over base-pointed transitive actions of a free group
on a fixed number of points, first-occurrence vertex numbering, and
constraint words pruning partial tables.  The fallback module is the
reference implementation.
"""
from libc.stdlib cimport calloc, free
from libc.string cimport memset


cdef struct WordSet:
    int count
    int* lens
    int** words


cdef void _free_wordset(WordSet* ws):
    cdef int i
    if ws.words != NULL:
        for i in range(ws.count):
            if ws.words[i] != NULL:
                free(ws.words[i])
        free(ws.words)
        ws.words = NULL
    if ws.lens != NULL:
        free(ws.lens)
        ws.lens = NULL


cdef int _build_wordset(object pywords, WordSet* ws) except -1:
    cdef int i, j, length
    cdef int count = len(pywords)
    ws.count = count
    ws.lens = <int*> calloc(count if count > 0 else 1, sizeof(int))
    ws.words = <int**> calloc(count if count > 0 else 1, sizeof(int*))
    if ws.lens == NULL or ws.words == NULL:
        raise MemoryError()
    for i in range(count):
        w = pywords[i]
        length = len(w)
        ws.lens[i] = length
        ws.words[i] = <int*> calloc(length if length > 0 else 1, sizeof(int))
        if ws.words[i] == NULL:
            raise MemoryError()
        for j in range(length):
            ws.words[i][j] = w[j]
    return 0


cdef int _trace(int* word, int wlen, int* fwd, int* bwd, int degree, int start):
    cdef int v = start, t, s
    for t in range(wlen):
        s = word[t]
        if s > 0:
            v = fwd[(s - 1) * degree + v]
        else:
            v = bwd[(-s - 1) * degree + v]
        if v < 0:
            return -1
    return v


cdef bint _partial_ok(WordSet* h, WordSet* ex, int* fwd, int* bwd, int degree):
    cdef int i, end
    for i in range(h.count):
        end = _trace(h.words[i], h.lens[i], fwd, bwd, degree, 0)
        if end >= 0 and end != 0:
            return False
    for i in range(ex.count):
        end = _trace(ex.words[i], ex.lens[i], fwd, bwd, degree, 0)
        if end == 0:
            return False
    return True


cdef bint _single_cycle(int* word, int wlen, int* fwd, int* bwd, int degree):
    cdef int length = 0, v = 0
    while True:
        v = _trace(word, wlen, fwd, bwd, degree, v)
        length += 1
        if v == 0:
            return length == degree
        if length > degree:
            return False


cdef bint _dfs(int n_letters, int degree, int* used, int* fwd, int* bwd,
               WordSet* h, WordSet* ex, WordSet* cyc):
    cdef int slot_l = -1, slot_v = -1, v, lid, u, top, i
    cdef bint grew
    for v in range(used[0]):
        for lid in range(n_letters):
            if fwd[lid * degree + v] < 0:
                slot_l = lid
                slot_v = v
                break
        if slot_l >= 0:
            break
    if slot_l < 0:
        if used[0] != degree:
            return False
        for i in range(h.count):
            if _trace(h.words[i], h.lens[i], fwd, bwd, degree, 0) != 0:
                return False
        for i in range(ex.count):
            if _trace(ex.words[i], ex.lens[i], fwd, bwd, degree, 0) == 0:
                return False
        for i in range(cyc.count):
            if not _single_cycle(cyc.words[i], cyc.lens[i], fwd, bwd, degree):
                return False
        return True
    top = used[0] + 1 if used[0] < degree else used[0]
    for u in range(top):
        if u < used[0] and bwd[slot_l * degree + u] >= 0:
            continue
        grew = u == used[0]
        fwd[slot_l * degree + slot_v] = u
        bwd[slot_l * degree + u] = slot_v
        if grew:
            used[0] += 1
        if _partial_ok(h, ex, fwd, bwd, degree) and _dfs(
            n_letters, degree, used, fwd, bwd, h, ex, cyc
        ):
            return True
        if grew:
            used[0] -= 1
        fwd[slot_l * degree + slot_v] = -1
        bwd[slot_l * degree + u] = -1
    return False


def search_action(n_letters, degree, h_words, excluded_words, cycle_words=()):
    """Complete permutation tables satisfying the constraints, or None.

    Words are sequences of signed letter numbers (letter id + 1, negated
    for inverses).  Every word in h_words must fix point 0, no word in
    excluded_words may fix it, and every word in cycle_words must act as
    a single cycle on all the points.
    """
    cdef int K = n_letters
    cdef int n = degree
    if K <= 0 or n <= 0:
        return None
    cdef WordSet h, ex, cyc
    h.count = ex.count = cyc.count = 0
    h.lens = ex.lens = cyc.lens = NULL
    h.words = ex.words = cyc.words = NULL
    cdef int* fwd = NULL
    cdef int* bwd = NULL
    cdef int used = 1
    cdef bint found = False
    cdef int lid, v
    try:
        _build_wordset(h_words, &h)
        _build_wordset(excluded_words, &ex)
        _build_wordset(cycle_words, &cyc)
        fwd = <int*> calloc(K * n, sizeof(int))
        bwd = <int*> calloc(K * n, sizeof(int))
        if fwd == NULL or bwd == NULL:
            raise MemoryError()
        memset(fwd, 255, K * n * sizeof(int))
        memset(bwd, 255, K * n * sizeof(int))
        if _partial_ok(&h, &ex, fwd, bwd, n):
            found = _dfs(K, n, &used, fwd, bwd, &h, &ex, &cyc)
        if not found:
            return None
        return [[fwd[lid * n + v] for v in range(n)] for lid in range(K)]
    finally:
        _free_wordset(&h)
        _free_wordset(&ex)
        _free_wordset(&cyc)
        if fwd != NULL:
            free(fwd)
        if bwd != NULL:
            free(bwd)
