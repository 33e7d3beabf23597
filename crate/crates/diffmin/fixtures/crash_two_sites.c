/* Aborts (SIGABRT) iff the input contains both an 'X' byte and a 'Y' byte,
 * anywhere and in any order.
 *
 * Input from argv[1] or stdin. Build: cc -O0 -o crash_two_sites crash_two_sites.c
 */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

int main(int argc, char **argv) {
    FILE *f = stdin;
    if (argc > 1) {
        f = fopen(argv[1], "rb");
        if (!f)
            return 2;
    }
    int has_x = 0, has_y = 0;
    int c;
    while ((c = fgetc(f)) != EOF) {
        if (c == 'X')
            has_x = 1;
        if (c == 'Y')
            has_y = 1;
    }
    if (has_x && has_y)
        abort();
    return 0;
}
