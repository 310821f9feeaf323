/* Factorial benchmark: computes FACT_N! in base 10^FA_DPE, one limb per
 * array element, least significant limb first.
 *
 * Corrections over the original program, flagged here rather than applied
 * silently:
 *   - the original never calls init_fa(), which leaves fa[0] = 0 and makes
 *     every product zero; fact() calls it first;
 *   - the original writes the multiply loop's tail confusingly as
 *     `while (i <= count || carry > 0) count = i-1;`. It is encoded here as
 *     the do-while exit test plus the assignment after the loop, matching
 *     the later register-aliased version of the same routine.
 *
 * Scale selection: default FACT_N=2000; -D SMALL gives 10.
 * -D DEBUG prints the decimal digits of the result.
 */
#include "header"

#define FA_SIZE 10000 /* number of array elements */
#define FA_DPE 4 /* digits per array element */
#define FACT_N 2000
#ifdef SMALL
#define FACT_N 10
#endif

int fa[FA_SIZE];
int fa_modulo; /* 10 ^ FA_DPE */
int count;

void fact(int n);
void print_fa();
void mult_fa(int n);
void init_fa();

int main(int argc, char **argv)
{
    fact(FACT_N); /* calculate the factorial */
    return 0;
}

void fact(int n)
{
    int i;
    init_fa();
    fa_modulo = 1;
    for (i = 1; i <= FA_DPE; i++) fa_modulo *= 10;
    for (i = 2; i <= n; i++) mult_fa(i);
#ifdef DEBUG
    print_fa();
#endif
}

void mult_fa(int k)
{
    register int i = 0;
    int carry = 0;
    int product = 0;
    do {
        product = fa[i] * k + carry;
        fa[i] = product % fa_modulo;
        carry = product / fa_modulo;
        i++;
    } while (i <= count || carry > 0);
    count = i - 1;
}

void init_fa()
{
    int i;
    for (i = 1; i < FA_SIZE; i++) fa[i] = 0;
    fa[0] = 1;
}

void print_fa()
{
    char str[10] = "";
    int i;
    printf("%0d", fa[count--]);
    while (count >= 0) {
        sprintf(str, "%0d", fa[count]);
        for (i = FA_DPE; i > strlen(str); i--)
            putchar('0');
        printf("%0d", fa[count]);
        fflush(stdout);
        count--;
    }
    printf("\n");
}
