/* Canary-style oracle: prints a bug-specific token to stderr and exits 0.
 *
 * "BUG6" anywhere in the input reports MAGMA_BUG_PNG006, "BUG7" reports
 * MAGMA_BUG_PNG007. No crash signal is ever raised; classification relies
 * entirely on token matching.
 *
 * Input from argv[1] or stdin. Build: cc -O0 -o canary canary.c
 */
#define _GNU_SOURCE
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static char *read_all(FILE *f, size_t *out_len) {
    size_t cap = 4096, len = 0;
    char *buf = malloc(cap);
    if (!buf)
        exit(2);
    for (;;) {
        size_t got = fread(buf + len, 1, cap - len, f);
        len += got;
        if (got == 0)
            break;
        if (len == cap) {
            cap *= 2;
            buf = realloc(buf, cap);
            if (!buf)
                exit(2);
        }
    }
    *out_len = len;
    return buf;
}

int main(int argc, char **argv) {
    FILE *f = stdin;
    if (argc > 1) {
        f = fopen(argv[1], "rb");
        if (!f)
            return 2;
    }
    size_t len = 0;
    char *buf = read_all(f, &len);
    if (len >= 4 && memmem(buf, len, "BUG6", 4))
        fprintf(stderr, "MAGMA_BUG_PNG006\n");
    else if (len >= 4 && memmem(buf, len, "BUG7", 4))
        fprintf(stderr, "MAGMA_BUG_PNG007\n");
    free(buf);
    return 0;
}
