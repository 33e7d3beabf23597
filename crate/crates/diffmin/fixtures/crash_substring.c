/* Crashes with SIGSEGV iff the input contains the byte sequence "BUG".
 *
 * Input comes from the file named by argv[1], or stdin when no argument is
 * given. Build: cc -O0 -o crash_substring crash_substring.c
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
    if (len >= 3 && memmem(buf, len, "BUG", 3)) {
        volatile char *p = NULL;
        *p = 1; /* SIGSEGV */
    }
    free(buf);
    return 0;
}
