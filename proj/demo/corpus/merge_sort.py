def merge_sort(arr):
    if len(arr) > 1:
        mid = len(arr) // 2
        left = arr[:mid]
        right = arr[mid:]

        merge_sort(left)
        merge_sort(right)

        i = j = k = 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                arr[k] = left[i]
                i += 1
            else:
                arr[k] = right[j]
                j += 1
            k += 1

        while i < len(left):
            arr[k] = left[i]
            i += 1
            k += 1

        while j < len(right):
            arr[k] = right[j]
            j += 1
            k += 1


def print_list(arr):
    for value in arr:
        print(value, end=" ")
    print()


if __name__ == "__main__":
    data = [12, 11, 13, 5, 6, 7]
    expected = sorted(data)
    print("Given array is")
    print_list(data)
    merge_sort(data)
    print("Sorted array is")
    print_list(data)
    print("largest:", data[len(data) - 1])
    print("ok" if data == expected else "mismatch")
