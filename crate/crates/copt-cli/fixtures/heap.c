/* Heap sort benchmark: sorts N random integers with an in-place max-heap.
 *
 * Known quirks of the original program are kept on purpose so the analyzer
 * has realistic material to work on:
 *   - gen_array fills a[1..n-1] and never writes a[n]; the interpreter
 *     zero-fills allocations, so runs stay deterministic anyway;
 *   - hsort declares a temporary t it never uses.
 * One correction: the original text of adjust() has a stray closing brace
 * after the first if; the braces below restore the evidently intended
 * while-loop nesting.
 *
 * Scale selection: default N=100000; -D MEDIUM gives 1000, -D SMALL 100.
 * -D DEBUG prints the array before and after sorting.
 */
#include "header"

#define TYPE int /* type of key by which to sort */
#define N 100000 /* number of elements to sort */
#ifdef MEDIUM
#define N 1000
#endif
#ifdef SMALL
#define N 100
#endif

void gen_array(TYPE **a, int n);
void hsort(TYPE *a, int n);
void adjust(TYPE *a, int i, int n);
void swap(int *a, int *b);

int main()
{
    TYPE *a;
#ifdef DEBUG
    int i;
#endif
    gen_array(&a, N); /* generate random numbers as raw data */
#ifdef DEBUG
    for (i = 1; i <= N; i++) printf("%d ", a[i]);
    printf("\n");
#endif
    hsort(a, N); /* sort the array */
#ifdef DEBUG
    for (i = 1; i <= N; i++) printf("%d ", a[i]);
    printf("\n");
#endif
    return 1;
}

void gen_array(TYPE **a, int n)
{
    int i;
    *a = (int *) malloc((n + 1) * sizeof(TYPE)); /* allocate memory */
    srand(time(0)); /* initialise the random number generator */
    for (i = 1; i < n; i++) (*a)[i] = rand(); /* generate the numbers */
    (*a)[0] = n; /* 1st element = num of elements */
}

void hsort(TYPE *a, int n)
{
    /* n = number of elements */
    int i;
    TYPE t;
    for (i = n / 2; i >= 1; i--) /* form the heap */
        adjust(a, i, n);
    /* now we have a heap */
    for (i = n - 1; i >= 1; i--) { /* repeat */
        swap(&a[1], &a[i + 1]); /* swap a[i+1] and a[1] */
        adjust(a, 1, i); /* recalculate heap */
    }
}

void swap(int *a, int *b) { int t; t = *a; *a = *b; *b = t; }

void adjust(TYPE *a, int i, int n)
{
    /* adjust a root node in left and right heaps */
    int j, done = 0;
    TYPE k; /* n = total elements, i = root node to adjust */
    k = a[i];
    j = 2 * i;
    while ((j <= n) && !done) {
        if (j < n) if (a[j] < a[j + 1]) j = j + 1;
        if (k >= a[j]) done = 1;
        else { a[j / 2] = a[j]; j = 2 * j; }
    }
    a[j / 2] = k;
}
