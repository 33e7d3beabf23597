/* Writes the crash token to stderr, then sleeps for 10 seconds.
 *
 * Exercises the hang classification: the token is visible on stderr but the
 * process exceeds any reasonable timeout, so the run must be classified as a
 * hang, never as a crash.
 *
 * Build: cc -O0 -o sleeper sleeper.c
 */
#include <stdio.h>
#include <unistd.h>

int main(void) {
    fprintf(stderr, "MAGMA_BUG_PNG006\n");
    fflush(stderr);
    sleep(10);
    return 0;
}
