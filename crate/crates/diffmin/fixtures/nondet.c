/* Nondeterministic crasher: the crash signal flips between runs.
 *
 * With NONDET_STATE set, a state file toggles the signal deterministically:
 * the first run dies with SIGSEGV, the next with SIGABRT, and so on. Without
 * it, the choice comes from the nanosecond clock. Either way two consecutive
 * runs disagree often enough to trip nondeterminism detection.
 *
 * Build: cc -O0 -o nondet nondet.c
 */
#include <stdio.h>
#include <stdlib.h>
#include <time.h>

int main(void) {
    long counter = 0;
    const char *state_path = getenv("NONDET_STATE");
    if (state_path) {
        FILE *f = fopen(state_path, "r");
        if (f) {
            if (fscanf(f, "%ld", &counter) != 1)
                counter = 0;
            fclose(f);
        }
        FILE *out = fopen(state_path, "w");
        if (out) {
            fprintf(out, "%ld\n", counter + 1);
            fclose(out);
        }
    } else {
        struct timespec ts;
        clock_gettime(CLOCK_MONOTONIC, &ts);
        counter = ts.tv_nsec;
    }
    if (counter % 2 == 0) {
        volatile char *p = NULL;
        *p = 1; /* SIGSEGV */
    }
    abort(); /* SIGABRT */
}
